#include "wie/cli.hpp"

int main(int argc, char** argv) { return wie::cli::run(argc, argv); }
