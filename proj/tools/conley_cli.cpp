#include <cstdio>

int main() {
    std::puts("conley_cli: pending");
    return 2;
}
