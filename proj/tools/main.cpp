#include "hslab/cli.hpp"

int main(int argc, char** argv) { return hslab::cli_dispatch(argc, argv); }
