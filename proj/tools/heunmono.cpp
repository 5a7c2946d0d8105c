#include "heunmono/cli.hpp"

int main(int argc, char** argv) { return heunmono::cli::run(argc, argv); }
