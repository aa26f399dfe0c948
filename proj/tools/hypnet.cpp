#include "cli.hpp"

int main(int argc, char** argv) { return hypnet::cli::main(argc, argv); }
