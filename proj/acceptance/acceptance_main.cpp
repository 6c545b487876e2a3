#include <cstdio>

int main(int, char**) {
    std::puts("acceptance: pending");
    return 1;
}
