#include "mab/cli.hpp"

int main(int argc, char** argv) { return mab::cli::main(argc, argv); }
