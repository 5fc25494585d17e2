#include "cli.hpp"

int main(int argc, char** argv) { return cropyield::cli::run(argc, argv); }
