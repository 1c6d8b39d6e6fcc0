#include "sbcheck/cli.hpp"

int main(int argc, char** argv) { return sbcheck::cli::run(argc, argv); }
