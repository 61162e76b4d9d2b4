#include <cstdio>

int main() {
  std::puts("journeybench: CLI under construction");
  return 0;
}
