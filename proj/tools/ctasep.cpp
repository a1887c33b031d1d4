#include "ctasep/cli/run.hpp"

int main(int argc, char** argv) { return ctasep::cli::main_entry(argc, argv); }
