

class EventBase(object):

    def __init__(self, msg):
        self.msg = msg

    def __repr__(self):
        return '<%s %s>' % (self.__class__.__name__, self.msg)


class EventProjection(EventBase):
    """Beliefs left the outer box (or overflowed) and were reset.
    msg: dict(period, candidate, reset_to)"""
    pass


class EventClamp(EventBase):
    """An ODE step left the admissible region and was pulled back.
    msg: dict(tau, candidate, clamped_to)"""
    pass
