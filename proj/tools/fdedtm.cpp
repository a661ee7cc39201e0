#include "cli.hpp"

int main(int argc, char** argv) { return fdedtm::cli::run(argc, argv); }
