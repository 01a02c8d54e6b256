#include "confound/cli.hpp"

int main(int argc, char** argv) { return confound::run_cli(argc, argv); }
