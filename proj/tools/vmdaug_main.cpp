#include <cstdio>

#include "vmdaug/vmdaug.hpp"

int main() {
    std::puts("vmdaug: CLI under construction");
    return 0;
}
