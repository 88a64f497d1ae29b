#include "perfshift/experiment.hpp"

int main(int argc, char** argv) { return perfshift::cli_main(argc, argv); }
