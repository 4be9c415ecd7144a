#include "tabsyn/cli.hpp"

int main(int argc, char** argv) { return tabsyn::cli::run(argc, argv); }
