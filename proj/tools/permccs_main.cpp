#include "permccs/parse.hpp"
int main() { return 0; }
