#include "phdinf/cli.hpp"

int main(int argc, char** argv) { return phdinf::cli::run(argc, argv); }
