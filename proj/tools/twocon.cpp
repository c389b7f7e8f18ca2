#include "twocon/cli.hpp"

int main(int argc, char** argv) { return twocon::cli::run(argc, argv); }
