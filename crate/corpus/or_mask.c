int or_mask(int a) {
  int *p = 0;
  int y = a | 4;
  if ((y & 4) == 0)
    return *p;
  return 1;
}
