#include "sce/cli.hpp"

int main(int argc, char** argv) { return sce::cli::main(argc, argv); }
