#include <iostream>

int main() {
  std::cout << "uslice\n";
  return 0;
}
