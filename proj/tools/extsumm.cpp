#include "extsum/cli.hpp"

int main(int argc, char** argv) { return extsum::RunCli(argc, argv); }
