#include "gkdv/harness.hpp"

int main(int argc, char** argv) { return gkdv::harness::cli_main(argc, argv); }
