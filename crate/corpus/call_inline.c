int helper(int *q) {
  return *q;
}

int call_inline(char a) {
  int v = 3;
  if (a & 1)
    return helper(0);
  return helper(&v);
}
