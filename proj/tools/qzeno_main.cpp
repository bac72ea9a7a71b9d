#include "qzeno/runner.hpp"

int main(int argc, char** argv) { return qzeno::run_cli(argc, argv); }
