#include "reasoner/cli.hpp"

int main(int argc, char** argv) { return reasoner::cli_main(argc, argv); }
