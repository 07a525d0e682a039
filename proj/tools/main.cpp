#include "cli_app.hpp"

int main(int argc, char** argv) { return tavie::cli::run(argc - 1, argv + 1); }
