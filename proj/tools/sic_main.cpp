#include <sic/cli.hpp>

int main(int argc, char** argv) { return sic::cli::run(argc, argv); }
