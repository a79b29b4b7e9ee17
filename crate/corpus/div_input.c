int div_input(unsigned char a, unsigned char b) {
  if (b < 3)
    return a / b;
  return a + b;
}
