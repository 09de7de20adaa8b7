"""Plot altitude, body rates and rotor speeds from a trajectory.csv."""
import sys

import matplotlib.pyplot as plt
import pandas as pd

df = pd.read_csv(sys.argv[1])
fig, ax = plt.subplots(3, 1, sharex=True, figsize=(8, 8))
ax[0].plot(df.t, -df.zn)
ax[0].set_ylabel("altitude [m]")
for c in ("p", "q", "r"):
    ax[1].plot(df.t, df[c], label=c)
ax[1].set_ylabel("rate [rad/s]")
ax[1].legend()
for c in ("omega1", "omega2", "omega3", "omega4"):
    ax[2].plot(df.t, df[c], label=c)
ax[2].set_ylabel("rotor speed [rad/s]")
ax[2].set_xlabel("t [s]")
ax[2].legend()
fig.tight_layout()
plt.savefig(sys.argv[2] if len(sys.argv) > 2 else "trajectory.png")
