"""Small PID building blocks with output clamping and anti-windup."""


class PI:
    """Proportional-integral loop with conditional anti-windup: the
    integrator is frozen whenever it would push the output further into
    saturation."""

    def __init__(self, kp, ki, limit, offset=0.0):
        self.kp = kp
        self.ki = ki
        self.limit = limit
        self.offset = offset
        self.integral = 0.0

    def reset(self):
        self.integral = 0.0

    def update(self, error, dt):
        unsat = self.offset + self.kp * error + self.ki * self.integral
        if self.ki != 0.0:
            saturating = (unsat > self.limit and error > 0) or \
                         (unsat < -self.limit and error < 0)
            if not saturating:
                self.integral += error * dt
                unsat = self.offset + self.kp * error + self.ki * self.integral
        return _clamp(unsat, self.limit)


class PD:
    """Proportional-derivative loop using a measured rate (no numeric
    differentiation)."""

    def __init__(self, kp, kd, limit, offset=0.0):
        self.kp = kp
        self.kd = kd
        self.limit = limit
        self.offset = offset

    def update(self, error, rate):
        return _clamp(self.offset + self.kp * error - self.kd * rate, self.limit)


class Washout:
    """First-order washout (high-pass) filter, used by the yaw damper."""

    def __init__(self, tau):
        self.tau = tau
        self._low = 0.0

    def reset(self):
        self._low = 0.0

    def update(self, x, dt):
        self._low += (x - self._low) * dt / self.tau
        return x - self._low


def _clamp(x, limit):
    if x > limit:
        return limit
    if x < -limit:
        return -limit
    return x
