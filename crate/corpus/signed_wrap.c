int signed_wrap(char b) {
  int d = 0;
  int w = b + b;
  if ((w & 1) == 1)
    return 7 / d;
  return w;
}
