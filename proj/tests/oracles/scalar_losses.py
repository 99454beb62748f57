"""Independent scalar oracle for the frozen loss values in test_losses.cpp."""
from fractions import Fraction
import mpmath as mp

mp.mp.dps = 40
ln = mp.log

vanilla = (-ln(mp.mpf("0.9")) - ln(mp.mpf("0.8")) - ln(mp.mpf("0.6"))) / 3
print("vanilla [1,0,1] [0.9,0.2,0.6] =", mp.nstr(vanilla, 20))

r = mp.mpf(2) / 3
entropy = -r * ln(r) - (1 - r) * ln(1 - r)
print("noisy n=3 r=2/3 p=2/3 =", mp.nstr(entropy, 20))
# dense grid scan over y_pred for the minimiser
grid = [mp.mpf(k) / 100000 for k in range(1, 100000)]
best = min(grid, key=lambda p: -r * ln(p) - (1 - r) * ln(1 - p))
print("noisy argmin on 1e-5 grid =", mp.nstr(best, 10))

refined = (3 * -ln(mp.mpf("0.8")) + 2 * -ln(mp.mpf("0.7"))) / 5
print("refined [(3,1),(3,2/3)] [1,0] [0.8,0.3] =", mp.nstr(refined, 20))
