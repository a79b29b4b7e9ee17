unsigned int shift_guard(unsigned char a) {
  unsigned int one = 1;
  unsigned int *z = 0;
  unsigned int bit = one << (a & 7);
  if (bit == 6)
    return *z;
  return bit;
}
