#include "mfgseg/cli.hpp"

int main(int argc, char** argv) { return mfgseg::run_cli(argc, argv); }
