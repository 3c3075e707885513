#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>

int main(int argc, char** argv) {
  // Fallback-weight warnings are expected on tiny random instances.
  setenv("DCOT_LOG", "error", 0);
  doctest::Context context(argc, argv);
  return context.run();
}
