//! Dormand–Prince 8(5,3) tableau and a single-step kernel on complex state.

#![allow(clippy::excessive_precision)]

use num_complex::Complex64;

pub(crate) const STAGES: usize = 12;

const C: [f64; STAGES] = [
    0.0,
    0.526001519587677318785587544488e-01,
    0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0,
];

const A: [[f64; 11]; STAGES] = [
    [0.0; 11],
    [
        5.26001519587677318785587544488e-02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.97250569845378994544595329183e-02,
        5.91751709536136983633785987549e-02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.95875854768068491816892993775e-02,
        0.0,
        8.87627564304205475450678981324e-02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.41365134159266685502369798665e-01,
        0.0,
        -8.84549479328286085344864962717e-01,
        9.24834003261792003115737966543e-01,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.70370370370370370370370370370e-02,
        0.0,
        0.0,
        1.70828608729473871279604482173e-01,
        1.25467687566822425016691814123e-01,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.71093750000000000000000000000e-02,
        0.0,
        0.0,
        1.70252211019544039314978060272e-01,
        6.02165389804559606850219397283e-02,
        -1.75781250000000000000000000000e-02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.70920001185047927108779319836e-02,
        0.0,
        0.0,
        1.70383925712239993810214054705e-01,
        1.07262030446373284651809199168e-01,
        -1.53194377486244017527936158236e-02,
        8.27378916381402288758473766002e-03,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        6.24110958716075717114429577812e-01,
        0.0,
        0.0,
        -3.36089262944694129406857109825e+00,
        -8.68219346841726006818189891453e-01,
        2.75920996994467083049415600797e+01,
        2.01540675504778934086186788979e+01,
        -4.34898841810699588477366255144e+01,
        0.0,
        0.0,
        0.0,
    ],
    [
        4.77662536438264365890433908527e-01,
        0.0,
        0.0,
        -2.48811461997166764192642586468e+00,
        -5.90290826836842996371446475743e-01,
        2.12300514481811942347288949897e+01,
        1.52792336328824235832596922938e+01,
        -3.32882109689848629194453265587e+01,
        -2.03312017085086261358222928593e-02,
        0.0,
        0.0,
    ],
    [
        -9.37142430085987325717040528057e-01,
        0.0,
        0.0,
        5.18637242884406370830023853209e+00,
        1.09143734899672957818500254654e+00,
        -8.14978701074692612513997267357e+00,
        -1.85200656599969598641566180701e+01,
        2.27394870993505042818970056734e+01,
        2.49360555267965238987089396762e+00,
        -3.04676447189821950038236690220e+00,
        0.0,
    ],
    [
        2.27331014751653820792359768449e+00,
        0.0,
        0.0,
        -1.05344954667372501984066689879e+01,
        -2.00087205822486249909675718444e+00,
        -1.79589318631187989172765950534e+01,
        2.79488845294199600508499808837e+01,
        -2.85899827713502369474065508674e+00,
        -8.87285693353062954433549289258e+00,
        1.23605671757943030647266201528e+01,
        6.43392746015763530355970484046e-01,
    ],
];

const B: [f64; STAGES] = [
    5.42937341165687622380535766363e-02,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566e+00,
    1.89151789931450038304281599044e+00,
    -5.80120396001058478146721142270e+00,
    3.11164366957819894408916062370e-01,
    -1.52160949662516078556178806805e-01,
    2.01365400804030348374776537501e-01,
    4.47106157277725905176885569043e-02,
];

const E5: [f64; STAGES] = [
    0.1312004499419488073250102996e-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753e+01,
    -0.4957589496572501915214079952e+00,
    0.1664377182454986536961530415e+01,
    -0.3503288487499736816886487290e+00,
    0.3341791187130174790297318841e+00,
    0.8192320648511571246570742613e-01,
    -0.2235530786388629525884427845e-01,
];

const BHH: [(usize, f64); 3] = [
    (0, 0.244094488188976377952755905512),
    (8, 0.733846688281611857341361741547),
    (11, 0.220588235294117647058823529412e-01),
];

pub(crate) struct Stepper {
    k: Vec<Vec<Complex64>>,
    tmp: Vec<Complex64>,
    pub(crate) y_new: Vec<Complex64>,
}

impl Stepper {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            k: vec![vec![Complex64::new(0.0, 0.0); dim]; STAGES],
            tmp: vec![Complex64::new(0.0, 0.0); dim],
            y_new: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Takes one step of size `h` from `(x, y)`; `f0` must hold `f(x, y)`.
    pub(crate) fn step<F>(&mut self, f: &mut F, x: f64, y: &[Complex64], f0: &[Complex64], h: f64)
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let dim = y.len();
        self.k[0].copy_from_slice(f0);
        for s in 1..STAGES {
            for i in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &a) in A[s].iter().enumerate().take(s) {
                    if a != 0.0 {
                        acc += self.k[j][i] * a;
                    }
                }
                self.tmp[i] = y[i] + acc * h;
            }
            let (done, rest) = self.k.split_at_mut(s);
            let _ = done;
            f(x + C[s] * h, &self.tmp, &mut rest[0]);
        }
        for i in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, &b) in B.iter().enumerate() {
                if b != 0.0 {
                    acc += self.k[s][i] * b;
                }
            }
            self.y_new[i] = y[i] + acc * h;
        }
    }

    /// Hairer's combined 5th/3rd order error norm, already scaled by `|h|`.
    pub(crate) fn error_norm(&self, h: f64, scale: &[f64]) -> f64 {
        let mut e5 = 0.0;
        let mut e3 = 0.0;
        let mut count = 0usize;
        for (i, &sk) in scale.iter().enumerate() {
            if sk <= 0.0 {
                continue;
            }
            count += 1;
            let mut a5 = Complex64::new(0.0, 0.0);
            let mut a3 = Complex64::new(0.0, 0.0);
            for s in 0..STAGES {
                let ks = self.k[s][i];
                a5 += ks * E5[s];
                a3 += ks * B[s];
            }
            for &(s, w) in &BHH {
                a3 -= self.k[s][i] * w;
            }
            e5 += (a5 / sk).norm_sqr();
            e3 += (a3 / sk).norm_sqr();
        }
        if count == 0 || (e5 == 0.0 && e3 == 0.0) {
            return 0.0;
        }
        let denom = e5 + 0.01 * e3;
        h.abs() * e5 / (denom * count as f64).sqrt()
    }
}
