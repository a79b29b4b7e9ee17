int mixed_paths(unsigned char a) {
  int *p = 0;
  int x = 0;
  if (a & 1) {
    if ((a & 3) == 2)
      x = *p;
  } else {
    if ((a & 3) == 1)
      x = *p;
  }
  return x;
}
