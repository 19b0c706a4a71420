// Times the serial and OpenMP batch runners over the same seeds.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include <omp.h>

#include "wsnake/simnet.hpp"

int main(int argc, char** argv) {
  using namespace wsnake;
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200;
  const bool use_p256 = argc > 2 && std::string(argv[2]) == "p256";
  simnet::SimConfig cfg;
  if (use_p256) cfg.curve = &p256();
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = i;

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const auto serial = simnet::run_sessions_serial(seeds, cfg);
  auto t1 = clock::now();
  const auto parallel = simnet::run_sessions_parallel(seeds, cfg);
  auto t2 = clock::now();

  const auto ms = [](auto d) { return std::chrono::duration<double, std::milli>(d).count(); };
  std::cout << "sessions " << n << " curve " << cfg.curve->id() << " threads " << omp_get_max_threads() << "\n"
            << "serial   " << ms(t1 - t0) << " ms\n"
            << "parallel " << ms(t2 - t1) << " ms\n"
            << "equal    " << (serial == parallel ? "yes" : "no") << "\n";
  return serial == parallel ? 0 : 1;
}
