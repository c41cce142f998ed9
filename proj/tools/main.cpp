#include "majorant/cli.hpp"

int main(int argc, char** argv) { return majorant::cli::main(argc, argv); }
