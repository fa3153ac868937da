#include "histolearn/cli.hpp"

int main(int argc, char** argv) { return histolearn::cli::dispatch(argc, argv); }
