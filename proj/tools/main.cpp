#include "perfplan/cli.hpp"

int main(int argc, char** argv) { return perfplan::run_cli(argc, argv); }
