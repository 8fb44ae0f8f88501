/// @file main.cpp
/// @brief Command-line front end (placeholder; filled in with the run/list
///        verbs once the solver presets land).

#include <cstdio>

int main() {
    std::puts("kinetics: no experiments wired up yet");
    return 1;
}
