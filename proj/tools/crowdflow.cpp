#include "crowdflow/runner.hpp"

int main(int argc, char** argv) { return crowdflow::run_command(argc, argv); }
