#include "affine/cli.hpp"

int main(int argc, char** argv) { return affine::cli::run(argc, argv); }
