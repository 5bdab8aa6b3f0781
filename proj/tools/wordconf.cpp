#include "wordconf/cli.hpp"

int main(int argc, char** argv) { return wordconf::cli::run(argc, argv); }
