#include "divband/cli.hpp"

int main(int argc, char** argv) { return divband::cli::run(argc, argv); }
