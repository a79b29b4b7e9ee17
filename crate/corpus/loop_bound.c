int loop_bound(unsigned char n) {
  int d = 0;
  unsigned int i = 0;
  unsigned int acc = n;
  while (i < 2) {
    acc = acc ^ 255;
    i = i + 1;
  }
  if (acc != n)
    return 3 / d;
  return 0;
}
