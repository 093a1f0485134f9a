#include "reliefscan/cli.hpp"

int main(int argc, char** argv) { return reliefscan::cli::main_entry(argc, argv); }
