#include "reoptdb/cli.hpp"

int main(int argc, char** argv) { return reoptdb::run_cli(argc, argv); }
