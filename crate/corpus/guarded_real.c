int guarded_real(unsigned char a) {
  int *p = 0;
  if ((a & 7) == 5)
    return *p;
  return 0;
}
