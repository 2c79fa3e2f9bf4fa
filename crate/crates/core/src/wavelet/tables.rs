pub(crate) const DB2: [f64; 4] = [
    -0.12940952255126037,
    0.2241438680420134,
    0.8365163037378079,
    0.48296291314453416,
];

pub(crate) const DB3: [f64; 6] = [
    0.03522629188570953,
    -0.08544127388202666,
    -0.13501102001025458,
    0.45987750211849154,
    0.8068915093110925,
    0.33267055295008263,
];

pub(crate) const DB4: [f64; 8] = [
    -0.010597401785069032,
    0.0328830116668852,
    0.030841381835560764,
    -0.18703481171909309,
    -0.027983769416859854,
    0.6308807679298589,
    0.7148465705529157,
    0.2303778133088965,
];

pub(crate) const DB5: [f64; 10] = [
    0.0033357252854737712,
    -0.012580751999081999,
    -0.006241490212798274,
    0.07757149384004572,
    -0.032244869584638375,
    -0.24229488706638203,
    0.13842814590132074,
    0.7243085284377729,
    0.6038292697971896,
    0.16010239797419293,
];

pub(crate) const DB6: [f64; 12] = [
    -0.0010773010853084796,
    0.004777257510945511,
    0.0005538422011614961,
    -0.03158203931748603,
    0.027522865530305727,
    0.09750160558732304,
    -0.12976686756726194,
    -0.22626469396543983,
    0.31525035170919763,
    0.7511339080210954,
    0.49462389039845306,
    0.11154074335010947,
];

pub(crate) const DB7: [f64; 14] = [
    0.00035371379997452024,
    -0.0018016407040474908,
    0.0004295779729213665,
    0.01255099855609984,
    -0.01657454163066688,
    -0.03802993693501441,
    0.08061260915108308,
    0.07130921926683026,
    -0.22403618499387498,
    -0.14390600392856498,
    0.4697822874051931,
    0.7291320908462351,
    0.3965393194819173,
    0.07785205408500918,
];

pub(crate) const DB8: [f64; 16] = [
    -0.00011747678412476953,
    0.0006754494064505693,
    -0.00039174037337694705,
    -0.004870352993451574,
    0.008746094047405777,
    0.013981027917398282,
    -0.044088253930794755,
    -0.017369301001807547,
    0.12874742662047847,
    0.0004724845739132828,
    -0.2840155429615469,
    -0.015829105256349306,
    0.5853546836542067,
    0.6756307362972898,
    0.31287159091429995,
    0.05441584224310401,
];

pub(crate) const DB9: [f64; 18] = [
    3.93473203162716e-05,
    -0.0002519631889427101,
    0.00023038576352319597,
    0.0018476468830562265,
    -0.00428150368246343,
    -0.004723204757751397,
    0.022361662123679096,
    0.00025094711483145197,
    -0.06763282906132997,
    0.03072568147933338,
    0.14854074933810638,
    -0.09684078322297646,
    -0.2932737832791749,
    0.13319738582500756,
    0.6572880780513005,
    0.6048231236901112,
    0.24383467461259034,
    0.038077947363878345,
];

pub(crate) const DB10: [f64; 20] = [
    -1.3264202894521244e-05,
    9.358867032006959e-05,
    -0.00011646685512928545,
    -0.0006858566949597116,
    0.001992405295185056,
    0.001395351747052901,
    -0.010733175483330575,
    0.0036065535669561697,
    0.033212674059341,
    -0.029457536821875813,
    -0.07139414716639708,
    0.09305736460357235,
    0.12736934033579325,
    -0.19594627437737705,
    -0.24984642432731538,
    0.2811723436605775,
    0.6884590394536035,
    0.5272011889317256,
    0.1881768000776915,
    0.026670057900555554,
];

pub(crate) const DMEY: [f64; 62] = [
    -4.813469368915229e-06,
    3.136544904679396e-05,
    -1.0695497153879626e-06,
    4.9111006129995835e-05,
    3.1922575406015536e-05,
    5.127257037158103e-06,
    -4.9039894206441446e-05,
    5.0641546142972845e-05,
    3.707405561508281e-05,
    -2.91670976438031e-05,
    1.017814125262533e-05,
    -5.9376487069649345e-05,
    -6.697028861376528e-05,
    -3.7368309813571985e-05,
    0.00013948577992489933,
    0.000721229366301693,
    -0.0005166768169663781,
    -0.0027088059668173166,
    0.0020773423105037566,
    0.006049146525002103,
    -0.006307234482897329,
    -0.011081580799273473,
    0.015201308768816507,
    0.01746984346189836,
    -0.03203806451767137,
    -0.024351010168348942,
    0.06368816096942508,
    0.030644768302535402,
    -0.13271287096188678,
    -0.03503605870875659,
    0.4440969048954973,
    0.7437337727330772,
    0.4441098619998198,
    -0.03504924427323822,
    -0.13271704700260498,
    0.03064519191991292,
    0.06365202418063287,
    -0.02439222869259425,
    -0.032072338571631616,
    0.01742233543223792,
    0.015169155414553118,
    -0.0110619875633299,
    -0.006298686632234077,
    0.00605233883938908,
    0.0021329636336485463,
    -0.0026585200890834803,
    -0.0004587669305981612,
    0.0008448559514178395,
    0.00020207541039362275,
    -0.00016592583917768061,
    -0.00019025195650706898,
    4.658520027483085e-06,
    0.00014820544829383453,
    4.456805504858836e-05,
    -5.333695931237135e-05,
    -7.338195182881048e-05,
    1.778870800958051e-05,
    5.1411024078790725e-05,
    -7.411546435727037e-05,
    -1.8094249900969467e-06,
    -4.63876066732732e-05,
    -7.118830770953412e-06,
];
