#include "mlat/cli.hpp"

int main(int argc, char** argv) { return mlat::cli::main(argc, argv); }
