#include <benchmark/benchmark.h>

// The distro benchmark_main archive carries foreign LTO bytecode, so main lives here.
BENCHMARK_MAIN();
