#include "bamani/cli.hpp"

int main(int argc, char** argv) { return bamani::cli::run(argc, argv); }
