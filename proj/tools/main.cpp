#include "cli_app.hpp"

int main(int argc, char** argv) { return kgned::cli::main(argc, argv); }
