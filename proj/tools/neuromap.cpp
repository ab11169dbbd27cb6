#include "neuromap/cli.hpp"

int main(int argc, char** argv) { return neuromap::cli::run(argc, argv); }
