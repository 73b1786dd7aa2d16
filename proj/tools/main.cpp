#include "ccdist/cli.hpp"

int main(int argc, char** argv)
{
    return ccdist::run_cli(argc, argv);
}
