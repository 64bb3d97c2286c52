#include "ndstab/cli.hpp"

int main(int argc, char** argv) { return ndstab::cli::run(argc, argv); }
