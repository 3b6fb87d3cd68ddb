#include "taukit/cli.hpp"

int main(int argc, char** argv) { return taukit::cli::run(argc, argv); }
