int null_flow(char a) {
  int *p = 0;
  int x = 0;
  if (a > 10)
    x = *p;
  return x;
}
