#include "coco/harness.hpp"

int main(int argc, char** argv) { return coco::cli_main(argc, argv); }
