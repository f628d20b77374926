int i;
int n;
int sn;
n = input();
sn = 0;
i = 0;
while (i <= n) {
    sn = sn + 2;
    i = i + 1; }
assert (sn == n*2 || sn == 0);
