int rem_guard(unsigned char a) {
  int d = 0;
  if ((a % 6) == 3) {
    if ((a % 2) == 0)
      return 100 / d;
  }
  return 0;
}
