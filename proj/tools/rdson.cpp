#include "rdson/cli.hpp"

int main(int argc, char** argv) { return rdson::cli::run(argc, argv); }
