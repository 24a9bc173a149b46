// Acceptance suite: one criterion per section, one pass/fail line each.
#include <iostream>

int main() {
  std::cout << "acceptance: placeholder\n";
  return 1;
}
