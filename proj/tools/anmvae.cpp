#include <iostream>

#include "anmvae/cli/commands.hpp"

int main(int argc, char** argv) { return anmvae::cli::run(argc, argv, std::cout, std::cerr); }
