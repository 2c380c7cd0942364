#include <cstdio>

int main() {
  std::puts("waypoint: command wiring pending");
  return 2;
}
