// Line-protocol stand-in for the front-end detector. Reads `<image>.count`
// sidecars; optionally drops objects and delays replies.
#include <unistd.h>

#include <CLI11.hpp>

#include "edgeroute/detector.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stub front-end detector", "edgeroute-stub-detector"};
  edgeroute::StubDetector::Options opts;
  int delay_ms = 0;
  app.add_option("--drop-prob", opts.drop_probability, "per-object drop probability")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", opts.seed, "drop seed");
  app.add_option("--delay-ms", delay_ms, "delay before each reply")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);
  opts.delay = std::chrono::milliseconds(delay_ms);
  edgeroute::StubDetector(opts).serve(STDIN_FILENO, STDOUT_FILENO);
  return 0;
}
