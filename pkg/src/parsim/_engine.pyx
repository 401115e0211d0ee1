# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused event-loop engine.

Bit-identical twin of ``parsim.sim_kernel.run_python``: same splitmix64
streams, same floating-point operation order, same (time, seq) event
ordering.  Any change here must be mirrored there (and vice versa); the
engine equivalence tests enforce it.
"""

from libc.math cimport NAN, ceil, floor, isnan, log
from libc.stdlib cimport free, malloc, realloc

from cpython.bytes cimport PyBytes_FromStringAndSize

from array import array

ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_POW_MINUS_53 = 1.0 / 9007199254740992.0

cdef int EV_ARRIVAL = 0
cdef int EV_STARTUP = 1
cdef int EV_COMPLETE = 2

cdef int W_STARTING = 0
cdef int W_IDLE = 1
cdef int W_BUSY = 2
cdef int W_DEAD = 3


# --- splitmix64, matching parsim.rng ----------------------------------------

cdef inline u64 mix64(u64 z) noexcept nogil:
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9ULL
    z ^= z >> 27
    z *= 0x94D049BB133111EBULL
    z ^= z >> 31
    return z


cdef inline u64 next_u64(u64* state) noexcept nogil:
    state[0] += GOLDEN
    return mix64(state[0])


cdef inline double next_unit(u64* state) noexcept nogil:
    return (<double>(next_u64(state) >> 11) + 0.5) * TWO_POW_MINUS_53


cdef inline u64 derive_state(u64 seed, u64 stream_id) noexcept nogil:
    return mix64(mix64(seed) + stream_id * GOLDEN)


cdef inline double exponential(u64* state, double mean) noexcept nogil:
    return -mean * log(next_unit(state))


# --- growable buffers --------------------------------------------------------

cdef struct DBuf:
    double* data
    Py_ssize_t n
    Py_ssize_t cap


cdef struct QBuf:
    i64* data
    Py_ssize_t n
    Py_ssize_t cap


cdef int dbuf_push(DBuf* b, double v) except -1:
    cdef double* p
    if b.n == b.cap:
        b.cap = b.cap * 2 if b.cap else 1024
        p = <double*>realloc(b.data, b.cap * sizeof(double))
        if p == NULL:
            raise MemoryError()
        b.data = p
    b.data[b.n] = v
    b.n += 1
    return 0


cdef int qbuf_push(QBuf* b, i64 v) except -1:
    cdef i64* p
    if b.n == b.cap:
        b.cap = b.cap * 2 if b.cap else 1024
        p = <i64*>realloc(b.data, b.cap * sizeof(i64))
        if p == NULL:
            raise MemoryError()
        b.data = p
    b.data[b.n] = v
    b.n += 1
    return 0


cdef object dbuf_to_array(DBuf* b):
    out = array("d")
    if b.n:
        out.frombytes(PyBytes_FromStringAndSize(<char*>b.data, b.n * sizeof(double)))
    return out


cdef object qbuf_to_array(QBuf* b):
    out = array("q")
    if b.n:
        out.frombytes(PyBytes_FromStringAndSize(<char*>b.data, b.n * sizeof(i64)))
    return out


# --- event heap ordered by (time, seq) ---------------------------------------

cdef struct Event:
    double time
    i64 seq
    int kind
    i64 a
    i64 b
    double x


cdef struct Heap:
    Event* data
    Py_ssize_t n
    Py_ssize_t cap


cdef inline bint ev_less(Event* a, Event* b) noexcept nogil:
    if a.time != b.time:
        return a.time < b.time
    return a.seq < b.seq


cdef int heap_push(Heap* h, Event ev) except -1:
    cdef Event* p
    cdef Event tmp
    cdef Py_ssize_t i, parent
    if h.n == h.cap:
        h.cap = h.cap * 2 if h.cap else 256
        p = <Event*>realloc(h.data, h.cap * sizeof(Event))
        if p == NULL:
            raise MemoryError()
        h.data = p
    i = h.n
    h.data[i] = ev
    h.n += 1
    while i > 0:
        parent = (i - 1) >> 1
        if ev_less(&h.data[i], &h.data[parent]):
            tmp = h.data[i]
            h.data[i] = h.data[parent]
            h.data[parent] = tmp
            i = parent
        else:
            break
    return 0


cdef Event heap_pop(Heap* h) noexcept nogil:
    cdef Event top = h.data[0]
    cdef Event tmp
    cdef Py_ssize_t i = 0, child
    h.n -= 1
    h.data[0] = h.data[h.n]
    while True:
        child = 2 * i + 1
        if child >= h.n:
            break
        if child + 1 < h.n and ev_less(&h.data[child + 1], &h.data[child]):
            child += 1
        if ev_less(&h.data[child], &h.data[i]):
            tmp = h.data[i]
            h.data[i] = h.data[child]
            h.data[child] = tmp
            i = child
        else:
            break
    return top


# --- ring buffers (request queue, parked workers) ----------------------------

cdef struct Ring:
    i64* rid
    double* demand
    Py_ssize_t head
    Py_ssize_t n
    Py_ssize_t cap


cdef int ring_grow(Ring* r, bint with_demand) except -1:
    cdef Py_ssize_t newcap = r.cap * 2 if r.cap else 256
    cdef i64* nrid = <i64*>malloc(newcap * sizeof(i64))
    cdef double* ndem = NULL
    cdef Py_ssize_t i, pos
    if nrid == NULL:
        raise MemoryError()
    if with_demand:
        ndem = <double*>malloc(newcap * sizeof(double))
        if ndem == NULL:
            free(nrid)
            raise MemoryError()
    for i in range(r.n):
        pos = (r.head + i) % r.cap
        nrid[i] = r.rid[pos]
        if with_demand:
            ndem[i] = r.demand[pos]
    free(r.rid)
    free(r.demand)
    r.rid = nrid
    r.demand = ndem
    r.head = 0
    r.cap = newcap
    return 0


cdef int ring_push(Ring* r, i64 rid, double demand, bint with_demand) except -1:
    cdef Py_ssize_t pos
    if r.n == r.cap:
        ring_grow(r, with_demand)
    pos = (r.head + r.n) % r.cap
    r.rid[pos] = rid
    if with_demand:
        r.demand[pos] = demand
    r.n += 1
    return 0


cdef inline void ring_pop(Ring* r, i64* rid, double* demand) noexcept nogil:
    rid[0] = r.rid[r.head]
    if demand != NULL and r.demand != NULL:
        demand[0] = r.demand[r.head]
    r.head = (r.head + 1) % r.cap
    r.n -= 1


# --- the fused simulation ------------------------------------------------------

def run_sim(
    u64 seed,
    double horizon,  # < 0 means unbounded
    int wl_kind,  # 0 poisson, 1 deterministic, 2 trace
    double wl_mean,
    double wl_interval,
    i64 wl_limit,  # < 0 means no limit; already applied for traces
    list trace_times,
    list trace_demands,
    int svc_kind,  # 0 constant, 1 exponential
    double svc_mean,
    int st_kind,
    double st_mean,
    int pid_enabled,
    double kp,
    double ki,
    double kd,
    int sign_flag,  # 0 w-t, 1 t-w
    double clamp,
    double target,
    i64 p_min,
    i64 p_max,
    i64 initial_pool,
):
    cdef bint has_horizon = horizon >= 0.0

    cdef u64 arrival_state = derive_state(seed, 1)
    cdef u64 service_state = derive_state(seed, 2)
    cdef u64 startup_state = derive_state(seed, 3)

    # request queue and ID counters
    cdef Ring queue
    queue.rid = NULL
    queue.demand = NULL
    queue.head = 0
    queue.n = 0
    queue.cap = 0
    cdef i64 last_arrived = 0
    cdef i64 last_dequeued = 0

    # worker table indexed by id (1-based)
    cdef Py_ssize_t worker_cap = 1024
    cdef char* wstate = <char*>malloc(worker_cap)
    cdef char* wtmp
    if wstate == NULL:
        raise MemoryError()
    cdef i64 next_wid = 1
    cdef i64 pool_size = 0
    cdef i64 busy_count = 0
    cdef i64 p_initial = 0

    cdef Ring parked
    parked.rid = NULL
    parked.demand = NULL
    parked.head = 0
    parked.n = 0
    parked.cap = 0

    # PID memory
    cdef double pid_integral = 0.0
    cdef double pid_prev_error = 0.0
    cdef double pid_prev_time = 0.0
    cdef bint pid_has_prev = False

    cdef Heap heap
    heap.data = NULL
    heap.n = 0
    heap.cap = 0
    cdef i64 seq = 0

    cdef DBuf sample_t_b = DBuf(NULL, 0, 0)
    cdef DBuf sample_err_b = DBuf(NULL, 0, 0)
    cdef DBuf sample_pout_b = DBuf(NULL, 0, 0)
    cdef DBuf arrivals_b = DBuf(NULL, 0, 0)
    cdef DBuf comp_t_b = DBuf(NULL, 0, 0)
    cdef QBuf sample_w_b = QBuf(NULL, 0, 0)
    cdef QBuf sample_p_b = QBuf(NULL, 0, 0)
    cdef QBuf sample_pw_b = QBuf(NULL, 0, 0)
    cdef QBuf sample_trig_b = QBuf(NULL, 0, 0)
    cdef QBuf comp_rid_b = QBuf(NULL, 0, 0)

    actions = []
    startups = []

    # trace rows into C arrays (limit already applied by the caller)
    cdef Py_ssize_t trace_n = len(trace_times)
    cdef double* trace_t = NULL
    cdef double* trace_d = NULL
    cdef Py_ssize_t i
    if trace_n:
        trace_t = <double*>malloc(trace_n * sizeof(double))
        trace_d = <double*>malloc(trace_n * sizeof(double))
        if trace_t == NULL or trace_d == NULL:
            free(trace_t)
            free(trace_d)
            free(wstate)
            raise MemoryError()
        for i in range(trace_n):
            trace_t[i] = <double>trace_times[i]
            trace_d[i] = <double>trace_demands[i]

    # workload generator state
    cdef double wl_time = 0.0
    cdef i64 wl_next_id = 1

    cdef i64 generated = 0
    cdef i64 served = 0
    cdef i64 creations = 0
    cdef i64 destructions = 0

    cdef double t_last = 0.0
    cdef double acc_w = 0.0
    cdef double acc_p = 0.0
    cdef double end_time = 0.0

    cdef Event ev, new_ev
    cdef double now, error, p_out, derivative, dt, x, demand, delay
    cdef i64 w_now, p_now, p_w, wid, rid, k, first_wid, ev_seq
    cdef bint exhausted = False

    try:
        # initial pool: idle and parked at t=0
        for i in range(initial_pool):
            if next_wid >= <i64>worker_cap:
                worker_cap *= 2
                wtmp = <char*>realloc(wstate, worker_cap)
                if wtmp == NULL:
                    raise MemoryError()
                wstate = wtmp
            wstate[next_wid] = W_IDLE
            ring_push(&parked, next_wid, 0.0, False)
            next_wid += 1
            pool_size += 1
        p_initial = pool_size

        # first arrival
        if wl_kind == 2:
            if wl_next_id > <i64>trace_n:
                exhausted = True
            else:
                new_ev = Event(trace_t[wl_next_id - 1], seq, EV_ARRIVAL, wl_next_id,
                               0, trace_d[wl_next_id - 1])
                wl_next_id += 1
                seq += 1
                heap_push(&heap, new_ev)
        else:
            if wl_limit >= 0 and wl_next_id > wl_limit:
                exhausted = True
            else:
                if wl_kind == 0:
                    wl_time += exponential(&arrival_state, wl_mean)
                else:
                    wl_time += wl_interval
                new_ev = Event(wl_time, seq, EV_ARRIVAL, wl_next_id, 0, NAN)
                wl_next_id += 1
                seq += 1
                heap_push(&heap, new_ev)

        while heap.n > 0 and (not has_horizon or heap.data[0].time <= horizon):
            ev = heap_pop(&heap)
            now = ev.time
            ev_seq = ev.seq
            acc_w += <double>(last_arrived - last_dequeued) * (now - t_last)
            acc_p += <double>pool_size * (now - t_last)
            t_last = now

            if ev.kind == EV_ARRIVAL:
                generated += 1
                dbuf_push(&arrivals_b, now)
                last_arrived += 1
                ring_push(&queue, ev.a, ev.x, True)

                # parked idle workers take the new request before sampling
                while parked.n > 0 and (last_arrived - last_dequeued) > 0:
                    ring_pop(&parked, &wid, NULL)
                    ring_pop(&queue, &rid, &demand)
                    last_dequeued = rid
                    if isnan(demand):
                        demand = svc_mean if svc_kind == 0 else exponential(&service_state, svc_mean)
                    wstate[wid] = W_BUSY
                    busy_count += 1
                    actions.append(("dispatch", now, ev_seq, rid, wid, demand))
                    new_ev = Event(now + demand, seq, EV_COMPLETE, wid, rid, 0.0)
                    seq += 1
                    heap_push(&heap, new_ev)

                # controller evaluation, trigger = arrival
                w_now = last_arrived - last_dequeued
                error = (<double>w_now - target) if sign_flag == 0 else (target - <double>w_now)
                p_now = pool_size
                if pid_enabled:
                    derivative = 0.0
                    if pid_has_prev:
                        dt = now - pid_prev_time
                        pid_integral += error * dt
                        if pid_integral > clamp:
                            pid_integral = clamp
                        elif pid_integral < -clamp:
                            pid_integral = -clamp
                        if dt > 0.0:
                            derivative = (error - pid_prev_error) / dt
                    p_out = kp * error + ki * pid_integral + kd * derivative
                    pid_prev_error = error
                    pid_prev_time = now
                    pid_has_prev = True
                    x = <double>p_now + p_out
                    if x >= 0.0:
                        p_w = <i64>floor(x + 0.5)
                    else:
                        p_w = <i64>ceil(x - 0.5)
                    if p_w < p_min:
                        p_w = p_min
                    elif p_w > p_max:
                        p_w = p_max
                else:
                    p_out = 0.0
                    p_w = p_now
                dbuf_push(&sample_t_b, now)
                qbuf_push(&sample_w_b, w_now)
                dbuf_push(&sample_err_b, error)
                qbuf_push(&sample_p_b, p_now)
                qbuf_push(&sample_pw_b, p_w)
                dbuf_push(&sample_pout_b, p_out)
                qbuf_push(&sample_trig_b, 0)

                if pid_enabled and p_w > p_now:
                    k = p_w - p_now
                    first_wid = next_wid
                    for i in range(k):
                        if next_wid >= <i64>worker_cap:
                            worker_cap *= 2
                            wtmp = <char*>realloc(wstate, worker_cap)
                            if wtmp == NULL:
                                raise MemoryError()
                            wstate = wtmp
                        wstate[next_wid] = W_STARTING
                        next_wid += 1
                        pool_size += 1
                    creations += k
                    actions.append(("create", now, ev_seq, k, first_wid))
                    for i in range(k):
                        delay = st_mean if st_kind == 0 else exponential(&startup_state, st_mean)
                        new_ev = Event(now + delay, seq, EV_STARTUP, first_wid + i, 0, 0.0)
                        seq += 1
                        heap_push(&heap, new_ev)

                # schedule the next arrival
                if not exhausted:
                    if wl_kind == 2:
                        if wl_next_id > <i64>trace_n:
                            exhausted = True
                        else:
                            new_ev = Event(trace_t[wl_next_id - 1], seq, EV_ARRIVAL, wl_next_id,
                                           0, trace_d[wl_next_id - 1])
                            wl_next_id += 1
                            seq += 1
                            heap_push(&heap, new_ev)
                    else:
                        if wl_limit >= 0 and wl_next_id > wl_limit:
                            exhausted = True
                        else:
                            if wl_kind == 0:
                                wl_time += exponential(&arrival_state, wl_mean)
                            else:
                                wl_time += wl_interval
                            new_ev = Event(wl_time, seq, EV_ARRIVAL, wl_next_id, 0, NAN)
                            wl_next_id += 1
                            seq += 1
                            heap_push(&heap, new_ev)
            else:
                # EV_STARTUP or EV_COMPLETE, both end in a pull
                wid = ev.a
                if ev.kind == EV_STARTUP:
                    startups.append((now, wid))
                    wstate[wid] = W_IDLE
                else:
                    served += 1
                    qbuf_push(&comp_rid_b, ev.b)
                    dbuf_push(&comp_t_b, now)
                    wstate[wid] = W_IDLE
                    busy_count -= 1

                # controller evaluation, trigger = pull
                w_now = last_arrived - last_dequeued
                error = (<double>w_now - target) if sign_flag == 0 else (target - <double>w_now)
                p_now = pool_size
                if pid_enabled:
                    derivative = 0.0
                    if pid_has_prev:
                        dt = now - pid_prev_time
                        pid_integral += error * dt
                        if pid_integral > clamp:
                            pid_integral = clamp
                        elif pid_integral < -clamp:
                            pid_integral = -clamp
                        if dt > 0.0:
                            derivative = (error - pid_prev_error) / dt
                    p_out = kp * error + ki * pid_integral + kd * derivative
                    pid_prev_error = error
                    pid_prev_time = now
                    pid_has_prev = True
                    x = <double>p_now + p_out
                    if x >= 0.0:
                        p_w = <i64>floor(x + 0.5)
                    else:
                        p_w = <i64>ceil(x - 0.5)
                    if p_w < p_min:
                        p_w = p_min
                    elif p_w > p_max:
                        p_w = p_max
                else:
                    p_out = 0.0
                    p_w = p_now
                dbuf_push(&sample_t_b, now)
                qbuf_push(&sample_w_b, w_now)
                dbuf_push(&sample_err_b, error)
                qbuf_push(&sample_p_b, p_now)
                qbuf_push(&sample_pw_b, p_w)
                dbuf_push(&sample_pout_b, p_out)
                qbuf_push(&sample_trig_b, 1)

                if pid_enabled and p_w < p_now:
                    # oversized pool: destroy the asking worker, exactly one
                    wstate[wid] = W_DEAD
                    pool_size -= 1
                    destructions += 1
                    actions.append(("destroy", now, ev_seq, wid))
                elif (last_arrived - last_dequeued) > 0:
                    ring_pop(&queue, &rid, &demand)
                    last_dequeued = rid
                    if isnan(demand):
                        demand = svc_mean if svc_kind == 0 else exponential(&service_state, svc_mean)
                    wstate[wid] = W_BUSY
                    busy_count += 1
                    actions.append(("dispatch", now, ev_seq, rid, wid, demand))
                    new_ev = Event(now + demand, seq, EV_COMPLETE, wid, rid, 0.0)
                    seq += 1
                    heap_push(&heap, new_ev)
                else:
                    ring_push(&parked, wid, 0.0, False)

        if has_horizon:
            end_time = horizon
            if horizon > t_last:
                acc_w += <double>(last_arrived - last_dequeued) * (horizon - t_last)
                acc_p += <double>pool_size * (horizon - t_last)
        else:
            end_time = t_last

        return (
            dbuf_to_array(&sample_t_b),
            qbuf_to_array(&sample_w_b),
            dbuf_to_array(&sample_err_b),
            qbuf_to_array(&sample_p_b),
            qbuf_to_array(&sample_pw_b),
            dbuf_to_array(&sample_pout_b),
            qbuf_to_array(&sample_trig_b),
            actions,
            startups,
            dbuf_to_array(&arrivals_b),
            qbuf_to_array(&comp_rid_b),
            dbuf_to_array(&comp_t_b),
            acc_w,
            acc_p,
            end_time,
            generated,
            served,
            last_arrived - last_dequeued,
            busy_count,
            p_initial,
            pool_size,
            creations,
            destructions,
        )
    finally:
        free(queue.rid)
        free(queue.demand)
        free(parked.rid)
        free(parked.demand)
        free(wstate)
        free(heap.data)
        free(trace_t)
        free(trace_d)
        free(sample_t_b.data)
        free(sample_err_b.data)
        free(sample_pout_b.data)
        free(arrivals_b.data)
        free(comp_t_b.data)
        free(sample_w_b.data)
        free(sample_p_b.data)
        free(sample_pw_b.data)
        free(sample_trig_b.data)
        free(comp_rid_b.data)
