"""Flat-array view of an instance plus the insertion kernels the solvers share.

Positions along a route are *points*: point 0 is the departing depot,
points 1..L are the stops and point L+1 is the returning depot.  Inserting
"after point i" places a stop between points i and i+1.
"""

from __future__ import annotations

from gatx.model import ScheduleEval

NEG_INF = -(1 << 62)


class Network:
    def __init__(self, inst):
        self.T = inst.matrix.times.tolist()
        self.D = inst.matrix.distances.tolist()
        loc, st, et, svc, vol = [], [], [], [], []
        for o in inst.orders:
            for wp in (o.pickup, o.dropoff):
                loc.append(int(wp.loc))
                st.append(int(wp.st))
                et.append(int(wp.et))
                svc.append(int(wp.service))
                vol.append(int(wp.vol))
        self.loc, self.st, self.et, self.svc, self.vol = loc, st, et, svc, vol
        self.rev = [int(o.rev) for o in inst.orders]
        self.owner = [o.owner for o in inst.orders]
        self.n_orders = len(inst.orders)
        self.vloc = [int(v.depot.loc) for v in inst.vehicles]
        self.vst = [int(v.depot.st) for v in inst.vehicles]
        self.vet = [int(v.depot.et) for v in inst.vehicles]
        self.vsvc = [int(v.depot.service) for v in inst.vehicles]
        self.cap = [int(v.cap) for v in inst.vehicles]
        self.vlsp = [v.lspid for v in inst.vehicles]
        self.alpha = [int(inst.lsps[v.lspid].alpha) for v in inst.vehicles]
        self.beta = [int(inst.lsps[v.lspid].beta) for v in inst.vehicles]

    # -- evaluation -------------------------------------------------------

    def evaluate(self, v, stops):
        """(feasible, distance) assuming pickups precede their drop-offs."""
        T, D, loc, st, et, svc, vol = self.T, self.D, self.loc, self.st, self.et, self.svc, self.vol
        cap = self.cap[v]
        prev = self.vloc[v]
        t = self.vst[v]
        s_prev = self.vsvc[v]
        load = 0
        dist = 0
        ok = True
        for c in stops:
            lc = loc[c]
            t += s_prev + T[prev][lc]
            if t < st[c]:
                t = st[c]
            if t > et[c]:
                ok = False
            load += vol[c]
            if load > cap:
                ok = False
            dist += D[prev][lc]
            prev = lc
            s_prev = svc[c]
        end = self.vloc[v]
        t += s_prev + T[prev][end]
        dist += D[prev][end]
        if t < self.vst[v]:
            t = self.vst[v]
        if t > self.vet[v]:
            ok = False
        return ok, dist

    def cost(self, v, stops, dist):
        if not stops:
            return 0
        return self.beta[v] + self.alpha[v] * dist

    def revenue(self, stops):
        rev = self.rev
        return sum(rev[c >> 1] for c in stops if not c & 1)

    def profit(self, v, stops):
        ok, dist = self.evaluate(v, stops)
        return self.revenue(stops) - self.cost(v, stops, dist)

    def full_eval(self, v, stops) -> ScheduleEval:
        """Evaluation with every schedule invariant checked explicitly."""
        T, D, loc, st, et, svc, vol = self.T, self.D, self.loc, self.st, self.et, self.svc, self.vol
        reason = None
        seen = {}
        for k, c in enumerate(stops):
            if c in seen:
                reason = reason or f"stop {c} visited twice"
            seen[c] = k
        for c, k in seen.items():
            partner = c ^ 1
            if partner not in seen:
                reason = reason or f"order {c >> 1} missing its {'drop-off' if c & 1 == 0 else 'pickup'}"
            elif c & 1 == 0 and seen[partner] < k:
                reason = reason or f"order {c >> 1} dropped off before pickup"
        prev = self.vloc[v]
        t = self.vst[v]
        times = [t]
        s_prev = self.vsvc[v]
        load = 0
        dist = 0
        for c in stops:
            lc = loc[c]
            t = max(t + s_prev + T[prev][lc], st[c])
            times.append(t)
            if t > et[c]:
                reason = reason or f"late at stop {c}: {t} > {et[c]}"
            load += vol[c]
            if load > self.cap[v]:
                reason = reason or f"capacity exceeded at stop {c}"
            if load < 0:
                reason = reason or f"negative load at stop {c}"
            dist += D[prev][lc]
            prev = lc
            s_prev = svc[c]
        end = self.vloc[v]
        t = max(t + s_prev + T[prev][end], self.vst[v])
        times.append(t)
        dist += D[prev][end]
        if t > self.vet[v]:
            reason = reason or f"late back at depot: {t} > {self.vet[v]}"
        cost = self.cost(v, stops, dist)
        return ScheduleEval(reason is None, dist, cost, self.revenue(stops), tuple(times), reason)

    # -- insertion --------------------------------------------------------

    def aux(self, v, stops):
        """Auxiliary arrays for O(1)-ish insertion checks, or None if infeasible."""
        T, loc, st, et, svc, vol = self.T, self.loc, self.st, self.et, self.svc, self.vol
        dl = self.vloc[v]
        P_loc = [dl]
        P_st = [self.vst[v]]
        P_et = [self.vet[v]]
        P_svc = [self.vsvc[v]]
        for c in stops:
            P_loc.append(loc[c])
            P_st.append(st[c])
            P_et.append(et[c])
            P_svc.append(svc[c])
        P_loc.append(dl)
        P_st.append(self.vst[v])
        P_et.append(self.vet[v])
        P_svc.append(0)
        K = len(P_loc)
        b = [0] * K
        q = [0] * K
        t = P_st[0]
        b[0] = t
        load = 0
        cap = self.cap[v]
        D = self.D
        dist = 0
        for k in range(1, K):
            t += P_svc[k - 1] + T[P_loc[k - 1]][P_loc[k]]
            if t < P_st[k]:
                t = P_st[k]
            if t > P_et[k]:
                return None
            b[k] = t
            dist += D[P_loc[k - 1]][P_loc[k]]
            if k < K - 1:
                load += vol[stops[k - 1]]
                if load > cap or load < 0:
                    return None
            q[k] = load
        lat = [0] * K
        lat[K - 1] = P_et[K - 1]
        for k in range(K - 2, -1, -1):
            nxt = lat[k + 1]
            if nxt < P_st[k + 1]:
                lat[k] = NEG_INF
            else:
                x = nxt - P_svc[k] - T[P_loc[k]][P_loc[k + 1]]
                lat[k] = x if x < P_et[k] else P_et[k]
        return RouteAux(v, tuple(stops), P_loc, P_st, P_et, P_svc, b, q, lat, dist,
                        self.cost(v, stops, dist))


class RouteAux:
    __slots__ = ("v", "stops", "loc", "st", "et", "svc", "b", "q", "lat", "dist", "cost")

    def __init__(self, v, stops, loc, st, et, svc, b, q, lat, dist, cost):
        self.v = v
        self.stops = stops
        self.loc = loc
        self.st = st
        self.et = et
        self.svc = svc
        self.b = b
        self.q = q
        self.lat = lat
        self.dist = dist
        self.cost = cost


def insert_pair(stops, o, i, j):
    """Stops with order ``o`` inserted: pickup after point i, drop-off after point j."""
    p, d = 2 * o, 2 * o + 1
    if j == i:
        return stops[:i] + (p, d) + stops[i:]
    return stops[:i] + (p,) + stops[i:j] + (d,) + stops[j:]


def remove_order(stops, o):
    p = 2 * o
    return tuple(c for c in stops if c >> 1 != o or (c != p and c != p + 1))


def insertion_lower_bound(net, aux, o):
    """Lower bound on the cost delta of inserting order ``o`` anywhere in the route."""
    D = net.D
    lp, ld = net.loc[2 * o], net.loc[2 * o + 1]
    L = aux.loc
    K = len(L)
    best_p = best_d = best_adj = None
    for i in range(K - 1):
        a, c = L[i], L[i + 1]
        base = D[a][c]
        dp = D[a][lp] + D[lp][c] - base
        dd = D[a][ld] + D[ld][c] - base
        adj = D[a][lp] + D[lp][ld] + D[ld][c] - base
        if best_p is None or dp < best_p:
            best_p = dp
        if best_d is None or dd < best_d:
            best_d = dd
        if best_adj is None or adj < best_adj:
            best_adj = adj
    lb = min(best_adj, best_p + best_d)
    extra = net.beta[aux.v] if not aux.stops else 0
    return net.alpha[aux.v] * lb + extra


def best_insertion(net, aux, o, limit):
    """Cheapest feasible insertion of order ``o`` with cost delta strictly below ``limit``.

    Returns (delta, i, j) or None.  Ties go to the lowest (i, j).
    """
    T, D = net.T, net.D
    p, d = 2 * o, 2 * o + 1
    lp, ld = net.loc[p], net.loc[d]
    stp, etp, svp, volp = net.st[p], net.et[p], net.svc[p], net.vol[p]
    std, etd, svd = net.st[d], net.et[d], net.svc[d]
    v = aux.v
    alpha = net.alpha[v]
    cap = net.cap[v]
    fixed = net.beta[v] if not aux.stops else 0
    L, ST, ET, SV, B, Q, LAT = aux.loc, aux.st, aux.et, aux.svc, aux.b, aux.q, aux.lat
    K = len(L)
    last = K - 2
    # dist deltas per gap
    dP = [0] * (K - 1)
    dD = [0] * (K - 1)
    for i in range(K - 1):
        a, c = L[i], L[i + 1]
        base = D[a][c]
        dP[i] = D[a][lp] + D[lp][c] - base
        dD[i] = D[a][ld] + D[ld][c] - base
    sufD = [0] * (K - 1)
    m = None
    for i in range(K - 2, -1, -1):
        x = dD[i]
        if m is None or x < m:
            m = x
        sufD[i] = m
    dPD = D[lp][ld]
    tPD = T[lp][ld]
    best = limit
    best_ij = None
    for i in range(K - 1):
        if Q[i] + volp > cap:
            continue
        li = L[i]
        bp = B[i] + SV[i] + T[li][lp]
        if bp < stp:
            bp = stp
        if bp > etp:
            continue
        nxt = L[i + 1]
        # adjacent pickup/drop-off
        cost = fixed + alpha * (D[li][lp] + dPD + D[ld][nxt] - D[li][nxt])
        if cost < best:
            bd = bp + svp + tPD
            if bd < std:
                bd = std
            if bd <= etd and bd + svd + T[ld][nxt] <= LAT[i + 1]:
                best = cost
                best_ij = (i, i)
        if i >= last:
            continue
        dpi = dP[i]
        if fixed + alpha * (dpi + sufD[i + 1]) >= best:
            continue
        # propagate the shifted schedule through points i+1 .. j
        t = bp
        s_prev = svp
        prev = lp
        for j in range(i + 1, last + 1):
            lj = L[j]
            t = t + s_prev + T[prev][lj]
            if t < ST[j]:
                t = ST[j]
            if t > ET[j] or Q[j] + volp > cap:
                break
            cost = fixed + alpha * (dpi + dD[j])
            if cost < best:
                bd = t + SV[j] + T[lj][ld]
                if bd < std:
                    bd = std
                if bd <= etd and bd + svd + T[ld][L[j + 1]] <= LAT[j + 1]:
                    best = cost
                    best_ij = (i, j)
            if t == B[j]:
                # shift absorbed: remaining checks depend only on the original schedule
                for jj in range(j + 1, last + 1):
                    if Q[jj] + volp > cap:
                        break
                    cost = fixed + alpha * (dpi + dD[jj])
                    if cost < best:
                        lj2 = L[jj]
                        bd = B[jj] + SV[jj] + T[lj2][ld]
                        if bd < std:
                            bd = std
                        if bd <= etd and bd + svd + T[ld][L[jj + 1]] <= LAT[jj + 1]:
                            best = cost
                            best_ij = (i, jj)
                break
            s_prev = SV[j]
            prev = lj
    if best_ij is None:
        return None
    return best, best_ij[0], best_ij[1]


def best_block_insertion(net, aux, block, limit):
    """Cheapest contiguous insertion of a closed stop sequence; (delta, i) or None."""
    T, D = net.T, net.D
    v = aux.v
    alpha = net.alpha[v]
    cap = net.cap[v]
    fixed = net.beta[v] if not aux.stops else 0
    locs = [net.loc[c] for c in block]
    inner = sum(D[locs[k]][locs[k + 1]] for k in range(len(locs) - 1))
    peak = 0
    load = 0
    for c in block:
        load += net.vol[c]
        if load > peak:
            peak = load
    first, lastloc = locs[0], locs[-1]
    L, SV, B, Q, LAT = aux.loc, aux.svc, aux.b, aux.q, aux.lat
    st, et, svc = net.st, net.et, net.svc
    K = len(L)
    best = limit
    best_i = None
    for i in range(K - 1):
        a, c = L[i], L[i + 1]
        cost = fixed + alpha * (D[a][first] + inner + D[lastloc][c] - D[a][c])
        if cost >= best or Q[i] + peak > cap:
            continue
        t = B[i]
        s_prev = SV[i]
        prev = a
        ok = True
        for code in block:
            lc = net.loc[code]
            t += s_prev + T[prev][lc]
            if t < st[code]:
                t = st[code]
            if t > et[code]:
                ok = False
                break
            s_prev = svc[code]
            prev = lc
        if ok and t + s_prev + T[prev][c] <= LAT[i + 1]:
            best = cost
            best_i = i
    if best_i is None:
        return None
    return best, best_i
