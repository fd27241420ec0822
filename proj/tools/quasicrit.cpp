#include "quasicrit/cli.hpp"

int main(int argc, char** argv) { return qc::cli::main_entry(argc, argv); }
