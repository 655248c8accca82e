#include "dasim/cli.hpp"

int main(int argc, char** argv) { return dasim::cli::run(argc, argv); }
