#include "cli/commands.hpp"

int main(int argc, char** argv) { return qcal::cli::run(argc, argv); }
