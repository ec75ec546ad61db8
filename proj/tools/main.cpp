#include "pulsatio/cli/app.hpp"

int main(int argc, char** argv) { return pulsatio::cli::run(argc, argv); }
