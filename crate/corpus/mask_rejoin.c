int mask_rejoin(int a) {
  int x = a & 12;
  int *p = 0;
  if (x == 3)
    return *p;
  return x;
}
