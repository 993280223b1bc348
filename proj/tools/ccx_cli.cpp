#include "ccx/cli.hpp"

int main(int argc, char** argv) { return ccx::run(argc, argv); }
